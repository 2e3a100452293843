#pragma once

// Umbrella header: discrete Laplace spectra of geodesic triangulations.

#include "geolap/analysis.hpp"
#include "geolap/assembly.hpp"
#include "geolap/complex.hpp"
#include "geolap/eig.hpp"
#include "geolap/errors.hpp"
#include "geolap/io.hpp"
#include "geolap/manifolds.hpp"
#include "geolap/metric.hpp"
