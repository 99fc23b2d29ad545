#pragma once

#include "feddense/checkpoint.hpp"
#include "feddense/error.hpp"
#include "feddense/experiment.hpp"
#include "feddense/fed.hpp"
#include "feddense/graph.hpp"
#include "feddense/hetero.hpp"
#include "feddense/matrix.hpp"
#include "feddense/model.hpp"
#include "feddense/nn/adam.hpp"
#include "feddense/nn/ops.hpp"
#include "feddense/nn/parameters.hpp"
#include "feddense/nn/tensor.hpp"
#include "feddense/resources.hpp"
#include "feddense/rng.hpp"
#include "feddense/struct_encode.hpp"
#include "feddense/tu_dataset.hpp"
