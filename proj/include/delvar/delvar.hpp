#pragma once

#include "delvar/autodiff.hpp"
#include "delvar/calculus.hpp"
#include "delvar/dubois_reymond.hpp"
#include "delvar/error.hpp"
#include "delvar/euler_lagrange.hpp"
#include "delvar/expr.hpp"
#include "delvar/function.hpp"
#include "delvar/integrand.hpp"
#include "delvar/noether.hpp"
#include "delvar/optimal_control.hpp"
#include "delvar/problem.hpp"
#include "delvar/solver.hpp"
#include "delvar/trajectory.hpp"
