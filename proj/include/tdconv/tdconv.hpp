/* Copyright 2026 The tdconv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "tdconv/architectures.hpp"
#include "tdconv/densify.hpp"
#include "tdconv/describe.hpp"
#include "tdconv/errors.hpp"
#include "tdconv/flops.hpp"
#include "tdconv/layers.hpp"
#include "tdconv/network.hpp"
#include "tdconv/network_io.hpp"
#include "tdconv/oracle.hpp"
#include "tdconv/random.hpp"
#include "tdconv/sbn.hpp"
#include "tdconv/tensor.hpp"
