# Utility scripts
