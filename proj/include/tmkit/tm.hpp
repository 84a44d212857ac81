#pragma once

// Umbrella header for the toolkit.

#include "tmkit/core.hpp"
#include "tmkit/model.hpp"
#include "tmkit/transforms.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/class_spec.hpp"
#include "tmkit/parse.hpp"
#include "tmkit/format.hpp"
#include "tmkit/oo.hpp"
#include "tmkit/json.hpp"
#include "tmkit/dot.hpp"
