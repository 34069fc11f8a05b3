#pragma once

#include "ggls/classify.hpp"
#include "ggls/commands.hpp"
#include "ggls/dataset.hpp"
#include "ggls/errors.hpp"
#include "ggls/eval.hpp"
#include "ggls/graph.hpp"
#include "ggls/kernel.hpp"
#include "ggls/manifold.hpp"
#include "ggls/mmd.hpp"
#include "ggls/rng.hpp"
#include "ggls/solver.hpp"
