#pragma once

#include "exactpen/certificate.hpp"
#include "exactpen/design_matrix.hpp"
#include "exactpen/errors.hpp"
#include "exactpen/io/generators.hpp"
#include "exactpen/io/instance.hpp"
#include "exactpen/io/rng.hpp"
#include "exactpen/lipschitz.hpp"
#include "exactpen/losses.hpp"
#include "exactpen/objective.hpp"
#include "exactpen/penalties.hpp"
#include "exactpen/solvers/alternating.hpp"
#include "exactpen/solvers/common.hpp"
#include "exactpen/solvers/dc.hpp"
#include "exactpen/solvers/proximal_gradient.hpp"
#include "exactpen/stationarity.hpp"
#include "exactpen/top_k.hpp"
