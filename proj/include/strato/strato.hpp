#pragma once

#include "strato/analysis.hpp"
#include "strato/basis.hpp"
#include "strato/coeffs.hpp"
#include "strato/combinatorics.hpp"
#include "strato/error.hpp"
#include "strato/exact.hpp"
#include "strato/expansion.hpp"
#include "strato/integral_spec.hpp"
#include "strato/io.hpp"
#include "strato/simulate.hpp"
