#pragma once

#include "errors.hpp"
#include "format.hpp"
#include "random.hpp"
#include "potential.hpp"
#include "tridiagonal.hpp"
#include "prufer.hpp"
#include "shape.hpp"
#include "stats.hpp"
#include "pointproc.hpp"
#include "limits.hpp"
#include "config.hpp"
#include "report.hpp"
#include "experiments.hpp"
#include "crosscheck.hpp"
