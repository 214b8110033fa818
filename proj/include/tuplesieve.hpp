#ifndef TUPLESIEVE_HPP
#define TUPLESIEVE_HPP

#include "tuplesieve/almost_primes.hpp"
#include "tuplesieve/budget.hpp"
#include "tuplesieve/core_arith.hpp"
#include "tuplesieve/correlations.hpp"
#include "tuplesieve/detector.hpp"
#include "tuplesieve/distribution.hpp"
#include "tuplesieve/experiment.hpp"
#include "tuplesieve/divisor_sums.hpp"
#include "tuplesieve/error.hpp"
#include "tuplesieve/parallel.hpp"
#include "tuplesieve/summation.hpp"
#include "tuplesieve/tuples.hpp"

#endif // TUPLESIEVE_HPP
