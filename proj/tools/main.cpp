#include "bisect_bayes/cli.hpp"

int main(int argc, char** argv) { return bisect_bayes::cli::dispatch(argc, argv); }
