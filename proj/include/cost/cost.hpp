#pragma once

#include "cost/answer_parser.hpp"
#include "cost/builder.hpp"
#include "cost/error.hpp"
#include "cost/harness.hpp"
#include "cost/lexicon.hpp"
#include "cost/metrics.hpp"
#include "cost/parallel.hpp"
#include "cost/png_io.hpp"
#include "cost/records.hpp"
#include "cost/segmentation.hpp"
#include "cost/types.hpp"
