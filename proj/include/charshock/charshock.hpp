#pragma once

#include "charshock/errors.hpp"
#include "charshock/numerics.hpp"
#include "charshock/eos.hpp"
#include "charshock/burgers.hpp"
#include "charshock/acoustic_geometry.hpp"
#include "charshock/shortpulse.hpp"
#include "charshock/radial_solver.hpp"
#include "charshock/foliation.hpp"
#include "charshock/io.hpp"
#include "charshock/harness.hpp"
