#pragma once

#include "csvd/diagram.hpp"
#include "csvd/energy.hpp"
#include "csvd/errors.hpp"
#include "csvd/fitter.hpp"
#include "csvd/geometry.hpp"
#include "csvd/image_io.hpp"
#include "csvd/labeling.hpp"
#include "csvd/parallel.hpp"
#include "csvd/params_io.hpp"
#include "csvd/pixels.hpp"
#include "csvd/render.hpp"
