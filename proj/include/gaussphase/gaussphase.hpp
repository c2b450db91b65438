#pragma once

#include "gaussphase/errors.hpp"
#include "gaussphase/gaussian_core.hpp"
#include "gaussphase/measurement.hpp"
#include "gaussphase/fisher.hpp"
#include "gaussphase/fock_oracle.hpp"
#include "gaussphase/estimator.hpp"
