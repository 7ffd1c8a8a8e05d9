# Package marker for billboard_salience.tools
