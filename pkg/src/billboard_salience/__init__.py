"""
billboard-salience: saliency and significance evaluation for roadside billboards.

This package computes spectral-residual saliency maps, scores annotated
billboard regions against a calibrated significance threshold, validates the
classification against eye-tracker fixations, and evaluates saliency maps
(AUC-Judd, NSS) and detections (IoU, AP@0.5:0.95). It runs as a batch CLI
and as an MCP server.
"""

__version__ = "0.1.0"
