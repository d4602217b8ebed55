"""Core utilities and configurations"""