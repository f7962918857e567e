class Text {
  int count;
public:
  void reset(){
    count = 0;
  }
  void clear(){
    reset();
  }
};
