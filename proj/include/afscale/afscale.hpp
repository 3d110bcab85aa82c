#pragma once

#include "afscale/analysis.hpp"
#include "afscale/distortion.hpp"
#include "afscale/errors.hpp"
#include "afscale/model.hpp"
#include "afscale/montecarlo.hpp"
#include "afscale/optimizer.hpp"
#include "afscale/quadrature.hpp"
#include "afscale/report.hpp"
#include "afscale/rng.hpp"
#include "afscale/specfun.hpp"
#include "afscale/waterfill.hpp"
