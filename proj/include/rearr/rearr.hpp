#pragma once

#include "rearr/comparison.hpp"
#include "rearr/fixtures.hpp"
#include "rearr/grid.hpp"
#include "rearr/inequalities.hpp"
#include "rearr/mollifier.hpp"
#include "rearr/numeric.hpp"
#include "rearr/poisson.hpp"
#include "rearr/profile.hpp"
#include "rearr/radial.hpp"
#include "rearr/rearrangement.hpp"
#include "rearr/report.hpp"
#include "rearr/suite.hpp"
