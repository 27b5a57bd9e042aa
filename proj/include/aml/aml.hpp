// Umbrella header.
#pragma once

#include "aml/value.hpp"
#include "aml/expr.hpp"
#include "aml/system.hpp"
#include "aml/automaton.hpp"
#include "aml/dsl.hpp"
#include "aml/trace.hpp"
#include "aml/learner.hpp"
#include "aml/conditions.hpp"
#include "aml/checker.hpp"
#include "aml/loop.hpp"
#include "aml/benchmark.hpp"
