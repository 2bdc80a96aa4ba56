# Scenario runner and command-line front end
