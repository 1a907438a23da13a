#pragma once

#include "sleeper/classifier.hpp"
#include "sleeper/cnn.hpp"
#include "sleeper/features.hpp"
#include "sleeper/gbt.hpp"
#include "sleeper/io.hpp"
#include "sleeper/logreg.hpp"
#include "sleeper/metrics.hpp"
#include "sleeper/pipeline.hpp"
#include "sleeper/plot.hpp"
#include "sleeper/prototypes.hpp"
#include "sleeper/render.hpp"
#include "sleeper/rulebank.hpp"
#include "sleeper/synth.hpp"
#include "sleeper/tree.hpp"
#include "sleeper/types.hpp"
