#pragma once

// Umbrella header for the EL screening toolkit.

#include "elscreen/baselines.hpp"
#include "elscreen/dataset.hpp"
#include "elscreen/el.hpp"
#include "elscreen/errors.hpp"
#include "elscreen/iterative.hpp"
#include "elscreen/kernel.hpp"
#include "elscreen/parallel.hpp"
#include "elscreen/report.hpp"
#include "elscreen/rng.hpp"
#include "elscreen/screening.hpp"
#include "elscreen/simgen.hpp"
#include "elscreen/sparse_additive.hpp"
#include "elscreen/vc_screening.hpp"

namespace elscreen {
inline constexpr const char* kVersion = "0.1.0";
}
