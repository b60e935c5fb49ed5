#pragma once

#include "basbench/error.hpp"
#include "basbench/dynamics.hpp"
#include "basbench/components.hpp"
#include "basbench/composer.hpp"
#include "basbench/discretize.hpp"
#include "basbench/simulate.hpp"
#include "basbench/reach.hpp"
#include "basbench/io.hpp"
#include "basbench/hybrid.hpp"
#include "basbench/benchmarks.hpp"
#include "basbench/stochastic.hpp"
