# This file is part of pyncvd
#
# https://github.com/pyncvd/pyncvd.git
#
# Copyright (c) 2024 pyncvd developers
#   All Rights Reserved
#
# License:  BSD-3-Clause
