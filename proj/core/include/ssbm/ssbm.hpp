#pragma once

#include "ssbm/benchmark.hpp"
#include "ssbm/em.hpp"
#include "ssbm/membership.hpp"
#include "ssbm/model_selection.hpp"
#include "ssbm/signed_graph.hpp"
#include "ssbm/spectral.hpp"
#include "ssbm/version.hpp"
