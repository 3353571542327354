// latticelab.hpp -- umbrella include.
#pragma once

#include "latticelab/catalyst.hpp"
#include "latticelab/experiment.hpp"
#include "latticelab/kernels.hpp"
#include "latticelab/lattice_map.hpp"
#include "latticelab/mc.hpp"
#include "latticelab/verifier.hpp"
#include "latticelab/walk.hpp"
