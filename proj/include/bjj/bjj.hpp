#pragma once

#include "bjj/bounds.hpp"
#include "bjj/channels.hpp"
#include "bjj/constants.hpp"
#include "bjj/dynamics.hpp"
#include "bjj/errors.hpp"
#include "bjj/fock.hpp"
#include "bjj/kernels.hpp"
#include "bjj/observables.hpp"
#include "bjj/quadrature.hpp"
#include "bjj/states.hpp"
