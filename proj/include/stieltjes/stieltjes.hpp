#pragma once

#include "derivator.hpp"
#include "errors.hpp"
#include "g_calculus.hpp"
#include "heat1d.hpp"
#include "heat2d.hpp"
#include "io.hpp"
#include "ls_integral.hpp"
#include "ode.hpp"
#include "special.hpp"
