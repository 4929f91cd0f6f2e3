#pragma once

#include "povm_entangle/error.hpp"
#include "povm_entangle/io/counts_file.hpp"
#include "povm_entangle/io/json.hpp"
#include "povm_entangle/io/svg.hpp"
#include "povm_entangle/linalg.hpp"
#include "povm_entangle/montecarlo.hpp"
#include "povm_entangle/operator.hpp"
#include "povm_entangle/pauli.hpp"
#include "povm_entangle/quasidist.hpp"
#include "povm_entangle/reference.hpp"
#include "povm_entangle/simulate.hpp"
#include "povm_entangle/standard_form.hpp"
#include "povm_entangle/tomography.hpp"
#include "povm_entangle/witness.hpp"
