#pragma once

#include "ccbench/rng.hpp"
#include "ccbench/envs.hpp"
#include "ccbench/repr.hpp"
#include "ccbench/rnn.hpp"
#include "ccbench/learn.hpp"
#include "ccbench/eval.hpp"
