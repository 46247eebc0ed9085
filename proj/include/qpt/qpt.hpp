#pragma once

#include "qpt/bridge.hpp"
#include "qpt/common.hpp"
#include "qpt/evolution.hpp"
#include "qpt/instruments.hpp"
#include "qpt/io.hpp"
#include "qpt/matrix_ops.hpp"
#include "qpt/multitime.hpp"
#include "qpt/process_tensor.hpp"
#include "qpt/random.hpp"
#include "qpt/scenario.hpp"
