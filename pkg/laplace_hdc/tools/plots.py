#!/usr/bin/env python3
# -*- coding: utf-8 -*-

'''
laplace_hdc.tools.plots
=======================

Graphs and images rendered with matplotlib, next to the CSV and PGM outputs
'''

import matplotlib
matplotlib.use('Agg')

from matplotlib.pyplot import close, figure, imsave  # noqa: E402


def save_gray_png(gray, path):
    """Render 8-bit gray levels as a PNG file"""
    imsave(path, gray, cmap='gray', vmin=0, vmax=255)


def plot_robustness(summary, path, title=None):
    """Accuracy against the ratio of flipped bits, with one standard deviation as error bars

    :param summary: :class:`pandas.DataFrame` indexed by ``flip_ratio`` with ``mean`` and ``std`` columns
    :param path: destination image file
    """
    fig = figure()
    ax = fig.add_subplot(1, 1, 1)
    ax.errorbar(summary.index * 100, summary['mean'] * 100, yerr=summary['std'].fillna(0) * 100,
                marker='o', capsize=3)
    ax.set_xlabel('flipped bits (%)')
    ax.set_ylabel('test accuracy (%)')
    ax.set_ylim(0, 100)
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches='tight')
    close(fig)
