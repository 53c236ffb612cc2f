#ifndef ENGAGEMENT_ENGAGEMENT_HPP_
#define ENGAGEMENT_ENGAGEMENT_HPP_

#include "engagement/charts.hpp"
#include "engagement/csv.hpp"
#include "engagement/dynamics.hpp"
#include "engagement/error.hpp"
#include "engagement/game.hpp"
#include "engagement/io.hpp"
#include "engagement/nmf.hpp"
#include "engagement/numeric.hpp"
#include "engagement/population.hpp"
#include "engagement/ratings.hpp"
#include "engagement/report.hpp"
#include "engagement/rng.hpp"
#include "engagement/sampling.hpp"
#include "engagement/serving_rule.hpp"
#include "engagement/single_minded.hpp"
#include "engagement/strategy.hpp"
#include "engagement/svg.hpp"
#include "engagement/sweep.hpp"

#endif  // ENGAGEMENT_ENGAGEMENT_HPP_
