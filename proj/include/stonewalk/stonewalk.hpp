// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#define STONEWALK_VERSION "0.1.0"

#include "stonewalk/cycles.hpp"
#include "stonewalk/dispersal.hpp"
#include "stonewalk/error.hpp"
#include "stonewalk/genealogy.hpp"
#include "stonewalk/io.hpp"
#include "stonewalk/limit_law.hpp"
#include "stonewalk/pde.hpp"
#include "stonewalk/quadrature.hpp"
#include "stonewalk/random.hpp"
#include "stonewalk/replicas.hpp"
#include "stonewalk/special.hpp"
#include "stonewalk/stats.hpp"
#include "stonewalk/walk_analytics.hpp"
