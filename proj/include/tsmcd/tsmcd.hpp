#ifndef TSMCD_TSMCD_HPP
#define TSMCD_TSMCD_HPP

// Two-stage multi-threshold estimation for accelerated failure time models:
// Kaplan-Meier weighted least squares, concave group-penalized segment
// selection, grid-search threshold refinement and BIC-driven tuning.

#include "tsmcd/bic.hpp"
#include "tsmcd/bootstrap.hpp"
#include "tsmcd/csv.hpp"
#include "tsmcd/errors.hpp"
#include "tsmcd/final_fit.hpp"
#include "tsmcd/fit_record.hpp"
#include "tsmcd/gcd.hpp"
#include "tsmcd/group_design.hpp"
#include "tsmcd/kaplan_meier.hpp"
#include "tsmcd/km_curve.hpp"
#include "tsmcd/parallel.hpp"
#include "tsmcd/penalty.hpp"
#include "tsmcd/pipeline.hpp"
#include "tsmcd/refine.hpp"
#include "tsmcd/rng.hpp"
#include "tsmcd/segmentation.hpp"
#include "tsmcd/simulate.hpp"
#include "tsmcd/survival_data.hpp"
#include "tsmcd/version.hpp"
#include "tsmcd/wls.hpp"

#endif
