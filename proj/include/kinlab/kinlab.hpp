#pragma once

#include "kinlab/bump.hpp"
#include "kinlab/config.hpp"
#include "kinlab/duhamel_solver.hpp"
#include "kinlab/error.hpp"
#include "kinlab/experiments.hpp"
#include "kinlab/fv_solver.hpp"
#include "kinlab/kinetic.hpp"
#include "kinlab/noise.hpp"
#include "kinlab/parallel.hpp"
#include "kinlab/philox.hpp"
#include "kinlab/problem.hpp"
#include "kinlab/quadrature.hpp"
#include "kinlab/report.hpp"
#include "kinlab/spectral.hpp"
#include "kinlab/stats.hpp"
#include "kinlab/torus_field.hpp"
