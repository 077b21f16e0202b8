#pragma once

// Discrete-time quantum walks on graphs with semi-infinite input/output
// tails: step-operator assembly, finite-window simulation, and scattering
// amplitudes (transmission, reflection, first-arrival statistics).

#include "qwalk/edge_basis.hpp"
#include "qwalk/graph.hpp"
#include "qwalk/graph_format.hpp"
#include "qwalk/models.hpp"
#include "qwalk/scattering.hpp"
#include "qwalk/step_operator.hpp"
#include "qwalk/symmetry.hpp"
#include "qwalk/types.hpp"
#include "qwalk/walk.hpp"
