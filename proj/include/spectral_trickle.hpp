#pragma once

#include "spectral_trickle/common.hpp"
#include "spectral_trickle/complex.hpp"
#include "spectral_trickle/spectra.hpp"
#include "spectral_trickle/walks.hpp"
#include "spectral_trickle/influence.hpp"
#include "spectral_trickle/lorentz.hpp"
#include "spectral_trickle/trickle.hpp"
#include "spectral_trickle/glauber.hpp"
#include "spectral_trickle/parallel.hpp"
