#!/usr/bin/env python3
# -*- coding: utf-8 -*-

'''
laplace_hdc.core.ansi_escapes
=============================

Colored console messages of the command line tools

Escape codes are only emitted when standard output is a terminal and the
``NO_COLOR`` environment variable is unset, so redirected reports stay plain.

>>> paint('text', red, enabled=False)
'text'
>>> paint('text', red, enabled=True) == red + 'text' + reset
True
'''

import os
import sys

red = '\x1b[1;31;40m'
green = '\x1b[1;32;40m'
blue = '\x1b[1;34;40m'
cyan = '\x1b[1;36;40m'
reset = '\x1b[0m'


def colors_enabled(stream=None):
    stream = sys.stdout if stream is None else stream
    if 'NO_COLOR' in os.environ:
        return False
    isatty = getattr(stream, 'isatty', None)
    return bool(isatty and isatty())


def paint(text, color, enabled=None):
    if enabled is None:
        enabled = colors_enabled()
    return f'{color}{text}{reset}' if enabled else str(text)


def heading(text):
    return paint(text, blue)


def value(text):
    return paint(text, cyan)


def passed(text):
    return paint(text, green)


def failure(text):
    return paint(text, red)
