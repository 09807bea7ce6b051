#pragma once

#include "stc/bundle.hpp"
#include "stc/config.hpp"
#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "stc/paragraph_vectors.hpp"
#include "stc/persistence.hpp"
#include "stc/pipeline.hpp"
#include "stc/tfidf.hpp"
#include "stc/tokenizer.hpp"
