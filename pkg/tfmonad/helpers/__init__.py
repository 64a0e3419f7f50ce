# Helpers package
