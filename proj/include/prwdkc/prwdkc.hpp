#pragma once

// Parametrized random-walk diffusion kernel clustering for directed and
// undirected graphs: vertex-measure design, reversible parametrized walk
// operators, diffusion kernels, validity criteria, diffusion-time estimation
// and the experiment harness.

#include "prwdkc/cluster.hpp"
#include "prwdkc/common.hpp"
#include "prwdkc/criteria.hpp"
#include "prwdkc/experiment.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/io.hpp"
#include "prwdkc/kernel.hpp"
#include "prwdkc/kmeans.hpp"
#include "prwdkc/nmi.hpp"
#include "prwdkc/parallel.hpp"
#include "prwdkc/rng.hpp"
#include "prwdkc/synth.hpp"
#include "prwdkc/walk.hpp"
