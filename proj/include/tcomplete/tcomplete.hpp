#pragma once

#include "tcomplete/difference.hpp"
#include "tcomplete/error.hpp"
#include "tcomplete/media.hpp"
#include "tcomplete/metrics.hpp"
#include "tcomplete/mode3.hpp"
#include "tcomplete/proximal.hpp"
#include "tcomplete/random.hpp"
#include "tcomplete/solver.hpp"
#include "tcomplete/tensor.hpp"
#include "tcomplete/tensor_io.hpp"
#include "tcomplete/tproduct.hpp"
