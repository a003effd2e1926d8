// Copyright 2026 The Noumenal Authors
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

#include "noumenal/classical.hpp"
#include "noumenal/construction.hpp"
#include "noumenal/core.hpp"
#include "noumenal/driver.hpp"
#include "noumenal/errors.hpp"
#include "noumenal/quantum.hpp"
#include "noumenal/rng.hpp"
#include "noumenal/sabotage.hpp"
#include "noumenal/speclang.hpp"
#include "noumenal/systems.hpp"
#include "noumenal/verifier.hpp"
