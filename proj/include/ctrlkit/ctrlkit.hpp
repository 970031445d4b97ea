#pragma once

// Umbrella header for the whole toolkit.

#include "ctrlkit/bridge.hpp"
#include "ctrlkit/config.hpp"
#include "ctrlkit/control.hpp"
#include "ctrlkit/corpus.hpp"
#include "ctrlkit/io.hpp"
#include "ctrlkit/metrics.hpp"
#include "ctrlkit/oracle.hpp"
#include "ctrlkit/rng.hpp"
#include "ctrlkit/rouge.hpp"
#include "ctrlkit/stopwords.hpp"
#include "ctrlkit/tagger.hpp"
#include "ctrlkit/text.hpp"
#include "ctrlkit/util.hpp"
