#pragma once

#include "dsk/correspondence.hpp"
#include "dsk/error.hpp"
#include "dsk/maps.hpp"
#include "dsk/numeric.hpp"
#include "dsk/parallel.hpp"
#include "dsk/sinkhorn.hpp"
#include "dsk/style.hpp"
#include "dsk/style_metric.hpp"
#include "dsk/tensor.hpp"
#include "dsk/tensor_io.hpp"
