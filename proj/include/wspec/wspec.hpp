#pragma once

#include "wspec/analysis.hpp"
#include "wspec/assembly.hpp"
#include "wspec/config.hpp"
#include "wspec/conformal.hpp"
#include "wspec/density.hpp"
#include "wspec/eigensolver.hpp"
#include "wspec/error.hpp"
#include "wspec/experiments.hpp"
#include "wspec/geometry.hpp"
#include "wspec/grid.hpp"
#include "wspec/io.hpp"
#include "wspec/measures.hpp"
#include "wspec/numeric.hpp"
#include "wspec/spectrum.hpp"
