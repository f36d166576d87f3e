#ifndef BISECT_BAYES_HPP
#define BISECT_BAYES_HPP

#include "bisect_bayes/bounds.hpp"
#include "bisect_bayes/checks.hpp"
#include "bisect_bayes/edge_model.hpp"
#include "bisect_bayes/experiments.hpp"
#include "bisect_bayes/graph.hpp"
#include "bisect_bayes/inference.hpp"
#include "bisect_bayes/io.hpp"
#include "bisect_bayes/labeling.hpp"
#include "bisect_bayes/likelihood.hpp"
#include "bisect_bayes/mcmc.hpp"
#include "bisect_bayes/parallel.hpp"
#include "bisect_bayes/posterior.hpp"
#include "bisect_bayes/priors.hpp"
#include "bisect_bayes/random.hpp"

#endif  // BISECT_BAYES_HPP
