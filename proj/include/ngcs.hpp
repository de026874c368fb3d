#ifndef NGCS_HPP
#define NGCS_HPP

#include "ngcs/error.hpp"
#include "ngcs/rng.hpp"
#include "ngcs/matrix.hpp"
#include "ngcs/linalg.hpp"
#include "ngcs/rstats.hpp"
#include "ngcs/netgen.hpp"
#include "ngcs/select.hpp"
#include "ngcs/downstream.hpp"

#endif  // NGCS_HPP
