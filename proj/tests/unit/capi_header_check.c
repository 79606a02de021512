//------------------------------------------------------------------------------
//
//   Copyright 2026 The ctvae Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------


/* Compiled as C to keep the public header free of C++ constructs. */
#include "ctvae/ctvae.h"

int ctvae_header_is_c(void);

int ctvae_header_is_c(void)
{
  ctvae_model *model = NULL;
  ctvae_status status = CTVAE_OK;
  (void)model;
  return status == CTVAE_OK && ctvae_version() != NULL;
}
