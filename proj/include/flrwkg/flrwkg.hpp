#ifndef FLRWKG_FLRWKG_HPP
#define FLRWKG_FLRWKG_HPP

#include "flrwkg/scale_factor.hpp"
#include "flrwkg/curved_mass.hpp"
#include "flrwkg/gamma_weight.hpp"
#include "flrwkg/quadrature.hpp"
#include "flrwkg/weight_lifespan.hpp"
#include "flrwkg/nonlinearity.hpp"
#include "flrwkg/torus.hpp"
#include "flrwkg/initial_data.hpp"
#include "flrwkg/spectral_solver.hpp"
#include "flrwkg/inequality_lab.hpp"
#include "flrwkg/config.hpp"
#include "flrwkg/report.hpp"
#include "flrwkg/cli.hpp"

#endif  // FLRWKG_FLRWKG_HPP
