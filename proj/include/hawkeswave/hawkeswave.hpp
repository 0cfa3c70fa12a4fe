#ifndef HAWKESWAVE_HAWKESWAVE_HPP
#define HAWKESWAVE_HAWKESWAVE_HPP

#include "analysis.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "hawkes.hpp"
#include "kernel.hpp"
#include "nfe.hpp"
#include "phase.hpp"
#include "quadrature.hpp"
#include "sigmoid.hpp"
#include "wave.hpp"

#endif  // HAWKESWAVE_HAWKESWAVE_HPP
