#pragma once

#include "csnewton/csd.hpp"
#include "csnewton/errors.hpp"
#include "csnewton/irk.hpp"
#include "csnewton/krylov.hpp"
#include "csnewton/linalg.hpp"
#include "csnewton/newton.hpp"
#include "csnewton/problems.hpp"
#include "csnewton/version.hpp"
