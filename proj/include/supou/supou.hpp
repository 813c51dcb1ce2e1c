#ifndef SUPOU_SUPOU_HPP
#define SUPOU_SUPOU_HPP

#include "supou/analytics.hpp"
#include "supou/csv.hpp"
#include "supou/estimate.hpp"
#include "supou/experiment.hpp"
#include "supou/marginals.hpp"
#include "supou/parallel.hpp"
#include "supou/quadrature.hpp"
#include "supou/rng.hpp"
#include "supou/simulate.hpp"
#include "supou/special_functions.hpp"
#include "supou/version.hpp"

#endif // SUPOU_SUPOU_HPP
