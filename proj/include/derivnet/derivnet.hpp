// Copyright 2026 The derivnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file derivnet.hpp
/// Everything at once.

#ifndef DERIVNET_DERIVNET_HPP
#define DERIVNET_DERIVNET_HPP

#include "derivnet/checkpoint.hpp"
#include "derivnet/config.hpp"
#include "derivnet/cost.hpp"
#include "derivnet/errors.hpp"
#include "derivnet/experiment.hpp"
#include "derivnet/expression.hpp"
#include "derivnet/geometry.hpp"
#include "derivnet/harness.hpp"
#include "derivnet/jet.hpp"
#include "derivnet/network.hpp"
#include "derivnet/objective.hpp"
#include "derivnet/optimizer.hpp"
#include "derivnet/targets.hpp"

#endif
