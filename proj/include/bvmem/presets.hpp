// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include "bvmem/stats.hpp"
#include "bvmem/vmem.hpp"

namespace bvmem {

// Bundled three-series demo design used by the default simulate config and
// the end-to-end tests: a stationary mean recursion plus a two-component
// unit-mean log-normal innovation mixture.
[[nodiscard]] MeanParams example_mean_params();
[[nodiscard]] InnovationSpec example_innovation();

}  // namespace bvmem
