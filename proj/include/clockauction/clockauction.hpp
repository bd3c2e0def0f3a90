// Copyright 2026 The clockauction Authors.
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

#ifndef CLOCKAUCTION_CLOCKAUCTION_HPP
#define CLOCKAUCTION_CLOCKAUCTION_HPP

#include "clockauction/engine.hpp"
#include "clockauction/error.hpp"
#include "clockauction/game.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/harness.hpp"
#include "clockauction/io.hpp"
#include "clockauction/mccfr.hpp"
#include "clockauction/policy.hpp"
#include "clockauction/rng.hpp"
#include "clockauction/sampling.hpp"
#include "clockauction/simulate.hpp"
#include "clockauction/types.hpp"
#include "clockauction/valuation.hpp"
#include "clockauction/verifier.hpp"

#endif  // CLOCKAUCTION_CLOCKAUCTION_HPP
