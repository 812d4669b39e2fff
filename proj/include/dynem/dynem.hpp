// Copyright 2026 The dynem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "bench.hpp"
#include "branch.hpp"
#include "builders.hpp"
#include "circuit.hpp"
#include "density.hpp"
#include "expectation.hpp"
#include "hamiltonians.hpp"
#include "mitigation.hpp"
#include "noise.hpp"
#include "schedule.hpp"
#include "statevector.hpp"
#include "trajectory.hpp"
#include "verify.hpp"
#include "vqe.hpp"
