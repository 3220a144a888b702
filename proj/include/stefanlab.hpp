#pragma once

#include "stefanlab/errors.hpp"
#include "stefanlab/grid.hpp"
#include "stefanlab/graphs.hpp"
#include "stefanlab/mollifier.hpp"
#include "stefanlab/solver.hpp"
#include "stefanlab/weak_form.hpp"
#include "stefanlab/geometry.hpp"
#include "stefanlab/constants.hpp"
#include "stefanlab/verify.hpp"
#include "stefanlab/io.hpp"
#include "stefanlab/config.hpp"
#include "stefanlab/pipeline.hpp"
