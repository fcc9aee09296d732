"""Noise-resistant superpixels (Centroid-X), superpixel edge detection and their benchmark."""
