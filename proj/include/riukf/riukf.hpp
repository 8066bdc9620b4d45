#pragma once

#include "riukf/error.hpp"
#include "riukf/filters.hpp"
#include "riukf/linalg.hpp"
#include "riukf/manifold.hpp"
#include "riukf/sigma.hpp"
#include "riukf/stats.hpp"
#include "riukf/systems.hpp"
#include "riukf/unscented.hpp"
#include "riukf/version.hpp"
