// Copyright 2026 The elliptic Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "elliptic/empirics.hpp"
#include "elliptic/ensemble.hpp"
#include "elliptic/error.hpp"
#include "elliptic/limitlaw.hpp"
#include "elliptic/parallel.hpp"
#include "elliptic/quadrature.hpp"
#include "elliptic/rng.hpp"
#include "elliptic/spectral.hpp"
#include "elliptic/svlab.hpp"

namespace elliptic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace elliptic
