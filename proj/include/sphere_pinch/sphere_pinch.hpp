#ifndef SPHERE_PINCH_SPHERE_PINCH_HPP
#define SPHERE_PINCH_SPHERE_PINCH_HPP

#include "curvature.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "spectrum.hpp"
#include "sphere_map.hpp"
#include "version.hpp"
#include "warped_metric.hpp"

#endif // SPHERE_PINCH_SPHERE_PINCH_HPP
