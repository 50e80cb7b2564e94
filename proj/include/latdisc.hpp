#pragma once

#include "latdisc/errors.hpp"
#include "latdisc/padic.hpp"
#include "latdisc/fp_linalg.hpp"
#include "latdisc/f2_solver.hpp"
#include "latdisc/elementary_forms.hpp"
#include "latdisc/jordan.hpp"
#include "latdisc/hensel.hpp"
#include "latdisc/orders.hpp"
#include "latdisc/group_engine.hpp"
#include "latdisc/generators.hpp"
