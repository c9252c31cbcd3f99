#pragma once

#include "catalog.hpp"
#include "chart.hpp"
#include "curvature.hpp"
#include "expr.hpp"
#include "flow.hpp"
#include "identities.hpp"
#include "jet.hpp"
#include "linalg.hpp"
#include "nptriad.hpp"
#include "rng.hpp"
