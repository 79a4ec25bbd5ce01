#pragma once

#include "fracmax/core.hpp"
#include "fracmax/geometry.hpp"
#include "fracmax/domain_grid.hpp"
#include "fracmax/fields.hpp"
#include "fracmax/stencil.hpp"
#include "fracmax/maximal_ops.hpp"
#include "fracmax/battery.hpp"
#include "fracmax/counterexamples.hpp"
#include "fracmax/metric_discrete.hpp"
#include "fracmax/verification.hpp"
#include "fracmax/suite.hpp"
#include "fracmax/io.hpp"
