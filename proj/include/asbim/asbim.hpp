#pragma once

#include "asbim/config.hpp"
#include "asbim/data/csv_io.hpp"
#include "asbim/data/descriptives.hpp"
#include "asbim/data/imputation.hpp"
#include "asbim/data/preprocess.hpp"
#include "asbim/data/synthetic.hpp"
#include "asbim/error.hpp"
#include "asbim/eval/baselines.hpp"
#include "asbim/eval/cross_validate.hpp"
#include "asbim/eval/report_io.hpp"
#include "asbim/model/asbim.hpp"
#include "asbim/model/checkpoint.hpp"
#include "asbim/numcore/dense.hpp"
#include "asbim/numcore/gradcheck.hpp"
#include "asbim/numcore/tape.hpp"
#include "asbim/rng.hpp"
#include "asbim/train/trainer.hpp"
#include "asbim/model/gradcheck.hpp"
