#pragma once

#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/quadrature.hpp"
#include "zml/zero_table_types.hpp"
#include "zml/zeta_engine.hpp"
#include "zml/zero_table.hpp"
#include "zml/constants.hpp"
#include "zml/primes.hpp"
#include "zml/approx_formula.hpp"
#include "zml/harper_partition.hpp"
#include "zml/random_model.hpp"
#include "zml/moments.hpp"
