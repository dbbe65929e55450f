#pragma once

#include "herglotz/conditions.hpp"
#include "herglotz/errors.hpp"
#include "herglotz/expr.hpp"
#include "herglotz/extremal.hpp"
#include "herglotz/integrate.hpp"
#include "herglotz/io.hpp"
#include "herglotz/noether.hpp"
#include "herglotz/problem.hpp"
#include "herglotz/report.hpp"
#include "herglotz/version.hpp"
