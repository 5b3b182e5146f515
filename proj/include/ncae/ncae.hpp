#pragma once
// Umbrella header for the full library.

#include "ncae/activations.hpp"
#include "ncae/checkpoint.hpp"
#include "ncae/config.hpp"
#include "ncae/csv.hpp"
#include "ncae/dataset.hpp"
#include "ncae/eval.hpp"
#include "ncae/integrators.hpp"
#include "ncae/lorenz96.hpp"
#include "ncae/manifold.hpp"
#include "ncae/network.hpp"
#include "ncae/neuromod.hpp"
#include "ncae/optimizer.hpp"
#include "ncae/pendulum.hpp"
#include "ncae/rng.hpp"
#include "ncae/trainer.hpp"
#include "ncae/training.hpp"
