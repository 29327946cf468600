#pragma once

#include "codec.hpp"
#include "compound.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "measures.hpp"
#include "polar.hpp"
#include "rng.hpp"
#include "sketch.hpp"
#include "storage.hpp"
