#pragma once

#include "accel.hpp"
#include "cost_model.hpp"
#include "experiment.hpp"
#include "init.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "matrix.hpp"
#include "nnls.hpp"
#include "spec_file.hpp"
#include "synth.hpp"
#include "updates.hpp"
