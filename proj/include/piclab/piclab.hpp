#pragma once

// Numerical laboratory for algebraic curvature tensors: the curvature
// quadratic Q(R), the isotropic-curvature cone hierarchy with margin
// certification, the curvature reaction ODE, and seeded verification
// campaigns over all of it.

#include "piclab/cone.hpp"
#include "piclab/curvature_tensor.hpp"
#include "piclab/errors.hpp"
#include "piclab/flow.hpp"
#include "piclab/frame.hpp"
#include "piclab/io.hpp"
#include "piclab/parallel.hpp"
#include "piclab/quadratic.hpp"
#include "piclab/rng.hpp"
#include "piclab/sampler.hpp"
#include "piclab/verify.hpp"
