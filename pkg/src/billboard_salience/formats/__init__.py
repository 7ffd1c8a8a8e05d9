"""File formats: dataset manifests, region lists, gaze logs, maps, threshold records and reports."""
