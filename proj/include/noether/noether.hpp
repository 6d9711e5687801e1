#pragma once

#include "noether/conservation.hpp"
#include "noether/currents.hpp"
#include "noether/documents.hpp"
#include "noether/expr.hpp"
#include "noether/extremal.hpp"
#include "noether/identity.hpp"
#include "noether/parser.hpp"
#include "noether/problem.hpp"
#include "noether/symmetry.hpp"
