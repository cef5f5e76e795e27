#pragma once

#include "isospec/experiments.hpp"
#include "isospec/framework.hpp"
#include "isospec/laplace2d.hpp"
#include "isospec/numcore.hpp"
#include "isospec/report_io.hpp"
#include "isospec/tolerances.hpp"
#include "isospec/volterra1d.hpp"
